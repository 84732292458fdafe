def callee():
    pass

def caller(fn):
    fn()

caller(callee)
