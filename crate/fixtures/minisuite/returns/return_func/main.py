def func():
    pass

def return_func():
    return func

a = return_func()
a()
