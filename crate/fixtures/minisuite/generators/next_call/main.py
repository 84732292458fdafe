def func():
    pass

def gen():
    yield func

g = gen()
next(g)()
