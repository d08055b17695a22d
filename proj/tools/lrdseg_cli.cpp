#include "cli.hpp"

int main(int argc, char** argv) { return lrdseg::cli::run(argc, argv); }
