class Item:
    def __init__(self, price):
        self.price = price

    def total(self, qty):
        return self.price * qty


class Discounted(Item):
    def total(self, qty):
        return super().total(qty) - 1
