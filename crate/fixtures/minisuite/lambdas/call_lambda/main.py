def func(x):
    return x

f = lambda x: func(x)
f(1)
