class Functor:
    def __call__(self):
        pass

f = Functor()
f()
