#include <cstdio>

int main() {
  std::puts("subcaustic: CLI wiring pending");
  return 0;
}
