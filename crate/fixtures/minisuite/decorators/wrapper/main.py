def dec(f):
    def wrapper():
        f()
    return wrapper

@dec
def func():
    pass

func()
