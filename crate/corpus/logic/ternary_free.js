function pick(flag) {
  var result = null;
  if (flag) result = 'yes';
  else result = 'no';
  return result;
}
