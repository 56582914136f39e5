#include "switchsim/cli.hpp"

int main(int argc, char** argv) { return switchsim::cli::run(argc, argv); }
