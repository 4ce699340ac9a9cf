#include <doctest.h>
TEST_SUITE_BEGIN("planar");
TEST_SUITE_END();
