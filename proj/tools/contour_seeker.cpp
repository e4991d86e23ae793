#include <iostream>

#include "contour_seeker/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return contour_seeker::cli::main_cli(std::move(args), std::cout, std::cerr);
}
