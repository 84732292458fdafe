import functools

@functools.lru_cache
def func():
    pass

func()
