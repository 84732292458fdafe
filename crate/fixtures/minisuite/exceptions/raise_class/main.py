class Fail(Exception):
    def __init__(self):
        pass

def boom():
    raise Fail

boom()
