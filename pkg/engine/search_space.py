import math

from .combiner import PathSet


def ordered_subset_count(n:int, k:int) -> int:
    """
    A(n,k) = n! / (n-k)!, the number of ordered selections of k out of n (0 when k > n)
    """
    if n < 0 or k < 0:
        raise ValueError(f"Counts must be non-negative, got n={n} k={k}")
    return math.perm(n, k)


def count_search_space(M:int, operator_arity_counts:dict[int, int]) -> int:
    """
    Size of the full search space over M original features: sum over arities i of A(M,i) * |O_i|
    """
    if M < 0:
        raise ValueError(f"M must be non-negative, got {M}")
    return sum(ordered_subset_count(M, arity) * count for arity, count in operator_arity_counts.items())


def count_reduced_search_space(p:PathSet, operator_arity_counts:dict[int, int]) -> int:
    """
    Upper bound on the search space left after path mining; combinations shared by several paths are counted once per path
    """
    return sum(count_search_space(len(path.features), operator_arity_counts) for path in p)
