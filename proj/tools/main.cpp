#include <vector>

#include "enthymeme/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return enthymeme::run_cli(args);
}
