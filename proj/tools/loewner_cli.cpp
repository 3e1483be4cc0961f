#include <cstdio>

int main() {
    std::puts("loewner CLI placeholder");
    return 0;
}
