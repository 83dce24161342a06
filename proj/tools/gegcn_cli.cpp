#include <cstdio>

int main() {
    std::puts("gegcn: CLI under construction");
    return 0;
}
