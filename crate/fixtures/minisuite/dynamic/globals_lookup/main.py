def func():
    pass

globals()["func"]()
