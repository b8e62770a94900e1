#include "warpchart/cli.hpp"

int main(int argc, char** argv) { return warpchart::cli::run(argc, argv); }
