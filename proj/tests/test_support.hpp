#pragma once

#include <gtest/gtest.h>

#include "mmspace/error.hpp"

#define EXPECT_ERRC(statement, errc)                                                          \
  do {                                                                                        \
    try {                                                                                     \
      statement;                                                                              \
      ADD_FAILURE() << "expected " << mmspace::errc_name(errc) << " from " #statement;        \
    } catch (const mmspace::Error& e) {                                                       \
      EXPECT_EQ(e.code(), errc) << "got " << mmspace::errc_name(e.code()) << ": " << e.what(); \
    }                                                                                         \
  } while (0)
