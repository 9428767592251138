#include <vector>

#include "snvsim/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return snvsim::cli_main(args);
}
