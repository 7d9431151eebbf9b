#include <cstdio>

int main() {
  std::fputs("msv: command-line interface not wired up yet\n", stderr);
  return 2;
}
