#pragma once

// Single include point for cpp-httplib so every translation unit sees the
// same feature macros (mixing them is an ODR violation).
#ifdef GRAPHSSL_HAVE_OPENSSL
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#endif
#include <httplib.h>
