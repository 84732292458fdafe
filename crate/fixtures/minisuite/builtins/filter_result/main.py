def keep(x):
    return True

def a():
    pass

for fn in filter(keep, [a]):
    fn()
