def f1():
    pass

def f2():
    pass

x, y = f1, f2
y()
