def key_fn(x):
    return x

sorted([3, 1], key=key_fn)
