#include <string>
#include <vector>

#include "nanoreg/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return nanoreg::run_cli(args);
}
