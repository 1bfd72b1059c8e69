let counter = 0;
const LIMIT = 100;
let a, b = 2, c;
const pair = [a, b];
