# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels: oracle answer derivation and inclusion census."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = z + GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def mix64(z):
    return _mix(<uint64_t>(z & 0xFFFFFFFFFFFFFFFF))


def seed_key(seed):
    return _mix(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))


def answer(uint64_t key, uint64_t point, int range_bits):
    return _mix(key ^ _mix(point)) >> (64 - range_bits)


def answers(uint64_t key, points, int range_bits):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] pts = np.ascontiguousarray(points, dtype=np.uint64)
    cdef Py_ssize_t n = pts.shape[0], i
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    cdef int shift = 64 - range_bits
    for i in range(n):
        out[i] = _mix(key ^ _mix(pts[i])) >> shift
    return out


def table(uint64_t key, int domain_bits, int range_bits):
    cdef Py_ssize_t n = (<Py_ssize_t>1) << domain_bits, i
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(n, dtype=np.uint64)
    cdef int shift = 64 - range_bits
    for i in range(n):
        out[i] = _mix(key ^ _mix(<uint64_t>i)) >> shift
    return out


def inclusion_counts(samples, Py_ssize_t size):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(size, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stamp = np.full(size, -1, dtype=np.int64)
    cdef Py_ssize_t s = 0, p
    for sample in samples:
        for q in sample:
            p = q
            if stamp[p] != s:
                stamp[p] = s
                counts[p] += 1
        s += 1
    return counts
