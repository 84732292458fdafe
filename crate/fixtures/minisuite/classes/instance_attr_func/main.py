def callback():
    pass

class Holder:
    def __init__(self, fn):
        self.fn = fn

    def run(self):
        self.fn()

h = Holder(callback)
h.run()
