def func():
    pass

a = b = func
c = a
a()
b()
c()
