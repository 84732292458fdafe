from shop.cart import Cart


def run():
    cart = Cart([5, 20])
    print(cart.dump())


run()
