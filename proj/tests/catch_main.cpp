// Single translation unit for the amalgamated test framework.
#include <catch2/catch_amalgamated.cpp>
