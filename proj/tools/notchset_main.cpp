#include "notchset/cli.hpp"

int main(int argc, char** argv) { return notchset::cli::run(argc, argv); }
