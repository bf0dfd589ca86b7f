#include <string>
#include <vector>

#include "ffil/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ffil::cli::run(args);
}
