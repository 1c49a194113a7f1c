#include "ma/harness.hpp"

int main(int argc, char** argv) { return ma::cli(argc, argv); }
