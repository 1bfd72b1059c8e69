var greeting = '你好，世界';
var emoji = "✓ done";
var mixed = 'café' + greeting;
