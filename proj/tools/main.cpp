#include "iglu/cli.hpp"

int main(int argc, char** argv) { return iglu::cli::dispatch(argc, argv); }
