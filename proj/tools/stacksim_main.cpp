#include <cstdio>
int main() { std::puts("stacksim: not wired up yet"); return 1; }
