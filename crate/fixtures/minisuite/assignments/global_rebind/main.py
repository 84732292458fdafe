def func():
    pass

handler = None

def install():
    global handler
    handler = func

install()
handler()
