Page({
  data: { cart: [], total: 0 },
  recompute: function () {
    var total = 0;
    var cart = this.data.cart;
    for (var i = 0; i < cart.length; i++) {
      if (cart[i].checked) {
        total += cart[i].price * cart[i].count;
      }
    }
    this.setData({ total: total });
  }
});
