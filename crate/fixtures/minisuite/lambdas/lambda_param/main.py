def apply(fn):
    return fn()

def target():
    pass

apply(lambda: target())
