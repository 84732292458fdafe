def func1():
    pass

def func2():
    pass

d = {}
d["a"] = func1
d["b"] = func2
d["a"]()
