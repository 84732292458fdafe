import os

def get_join():
    return os.path.join

j = get_join()
j("a", "b")
