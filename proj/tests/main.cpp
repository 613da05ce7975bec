// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
