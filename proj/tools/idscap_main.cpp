// CLI front end; subcommands are filled in as the library lands.
#include <cstdio>

int main() {
    std::puts("idscap: not wired up yet");
    return 1;
}
