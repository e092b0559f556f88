#pragma once

#include "fixture.hpp"

#include <doctest.h>
