#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "psc/run.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        psc::RunConfig cfg = psc::parse_config(args);
        return psc::run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "psc: " << e.what() << "\n";
        return 2;
    }
}
