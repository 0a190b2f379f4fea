#pragma once

#include "epsb/error.hpp"

#include <doctest.h>

/// Checks that an expression throws epsb::Error with the given code.
#define CHECK_EPSB_ERROR(expr, expected)                      \
  do {                                                        \
    bool thrown_ = false;                                     \
    try {                                                     \
      (void)(expr);                                           \
    } catch (const epsb::Error& e_) {                         \
      thrown_ = true;                                         \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());      \
    }                                                         \
    CHECK_MESSAGE(thrown_, "expected an epsb::Error: " #expr); \
  } while (0)
