def func():
    pass

d = {"outer": {"inner": func}}
d["outer"]["inner"]()
