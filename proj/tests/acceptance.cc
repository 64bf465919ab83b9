// tests/acceptance.cc
int main() { return 0; }
