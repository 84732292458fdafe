def func():
    pass

def caller():
    func()

caller()
