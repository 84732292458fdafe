class A:
    def func(self):
        pass

a = A()
a.func()
