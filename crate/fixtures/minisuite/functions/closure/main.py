def target():
    pass

def outer():
    fn = target
    def inner():
        fn()
    return inner

outer()()
