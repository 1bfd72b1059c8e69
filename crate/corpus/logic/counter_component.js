Component({
  properties: { step: { type: Number, value: 1 } },
  data: { value: 0 },
  methods: {
    inc: function () {
      this.setData({ value: this.data.value + this.properties.step });
      this.triggerEvent('change', { value: this.data.value });
    }
  }
});
