#include <iostream>

#include "greenflow/cli_app.hpp"

int main(int argc, char** argv) { return greenflow::run_cli(argc, argv, std::cout, std::cerr); }
