int main() {
unsigned char n = (unsigned char) rand();
if (n == 0) {
return 0;
}
unsigned char v = 0;
unsigned int s = 0;
unsigned int i = 0;
while (i < n) {
// Line A
v = (unsigned char) rand();
s += v;
++i;
}
assert(s >= v);
return 1;
}
