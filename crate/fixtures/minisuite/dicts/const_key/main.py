def func():
    pass

d = {"k": func}
d["k"]()
