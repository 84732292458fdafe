def f1():
    pass

def f2():
    pass

results = [fn() for fn in [f1, f2]]
