def func():
    pass

d = {"k": func}
d.get("k")()
