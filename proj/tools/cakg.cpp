#include "cakg/cli.hpp"

int main(int argc, char** argv) { return cakg::cli::run(argc, argv); }
