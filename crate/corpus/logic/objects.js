var config = {
  name: 'demo',
  'quoted-key': true,
  42: 'answer',
  default: null,
  nested: { deep: { deeper: [] } }
};
