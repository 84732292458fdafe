def func():
    pass

class Counter:
    def __iter__(self):
        return self

    def __next__(self):
        return func

for item in Counter():
    item()
