var n = 10;
n += 1;
n -= 2;
n *= 3;
n /= 4;
n %= 5;
obj.field = n;
obj['key'] = n;
a = b = c;
