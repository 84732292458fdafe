def make():
    return lambda: helper()

def helper():
    pass

g = make()
g()
