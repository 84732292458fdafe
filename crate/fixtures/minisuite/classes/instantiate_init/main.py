class MyClass:
    def __init__(self):
        self.helper()

    def helper(self):
        pass

obj = MyClass()
