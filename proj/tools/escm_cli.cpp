#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "escm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        auto config = escm::parse_and_validate(args, std::cout);
        if (!config) return 0;  // help requested
        escm::run(*config, std::cout);
        return 0;
    } catch (const escm::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
