#include <iostream>

#include "ronpaint/cli.hpp"

int main(int argc, char** argv) {
    return ronpaint::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
