def func():
    pass

def wrapper():
    def inner():
        return func
    return inner

f = wrapper()()
f()
