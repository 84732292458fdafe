def repeat(n):
    def decorator(f):
        return f
    return decorator

@repeat(2)
def func():
    pass

func()
