#include <string>
#include <vector>

#include "kgbayes/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return kgbayes::cli::run(args);
}
