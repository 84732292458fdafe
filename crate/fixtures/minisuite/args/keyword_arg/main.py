def first():
    pass

def second():
    pass

def run(a, b=None):
    b()

run(first, b=second)
