import random

import pytest

from memotrs import (
    App,
    Heap,
    HeapError,
    Var,
    canonical_tree,
    match_graph,
    match_pattern_at,
    match_term,
    minimal_shared_size,
    term_size,
)
from memotrs.heap import _Store
from helpers import complete_tree, random_value, suc_chain


def test_merge_hit_returns_receiver():
    h, a = Heap.empty().merge("zero", ())
    h2, b = h.merge("zero", ())
    assert h2 is h and a == b == 0
    assert h.node_count == 1


def test_merge_allocates_fresh_nodes_in_order():
    h, z = Heap.empty().merge("zero", ())
    h, s = h.merge("suc", (z,))
    assert (z, s) == (0, 1)
    assert h.entry(s) == ("suc", (0,))
    assert h.node_count == 2


def test_merge_rejects_dangling_argument():
    h, _ = Heap.empty().merge("zero", ())
    with pytest.raises(HeapError):
        h.merge("suc", (7,))
    with pytest.raises(HeapError):
        h.unfold(3)


def test_store_value_shares_equal_subtrees():
    leaf = App("leaf", ())
    h, root = Heap.empty().store_value(App("branch", (leaf, App("leaf", ()))))
    assert h.node_count == 2  # one leaf node, one branch node
    assert h.entry(root)[1] == (0, 0)


def test_store_value_counts():
    h, _ = Heap.empty().store_value(suc_chain(2))
    assert h.node_count == 3
    for n in (1, 5, 9):
        h2, _ = Heap.empty().store_value(complete_tree(n))
        assert h2.node_count == n + 1


def test_store_value_idempotent_same_location():
    h, a = Heap.empty().store_value(suc_chain(4))
    h2, b = h.store_value(suc_chain(4))
    assert h2 is h and a == b
    h3, c = h.store_value(suc_chain(2))
    assert h3 is h and c == 2  # the chain prefix is already present


def test_store_value_rejects_variables():
    with pytest.raises(HeapError):
        Heap.empty().store_value(App("suc", (Var("x"),)))


def test_unfold_round_trips():
    for value in (App("zero", ()), complete_tree(4), suc_chain(7)):
        h, loc = Heap.empty().store_value(value)
        assert h.unfold(loc) == value


def test_unfold_shares_term_objects():
    h, loc = Heap.empty().store_value(complete_tree(3))
    t = h.unfold(loc)
    assert t.args[0] is t.args[1]


def test_unfolded_size_is_arithmetic():
    h, loc = Heap.empty().store_value(complete_tree(80))
    assert h.node_count == 81
    assert h.unfolded_size(loc) == 2**81 - 1


def test_reachable_count_ignores_unrelated_nodes():
    h, a = Heap.empty().store_value(suc_chain(3))
    h, b = h.store_value(App("leaf", ()))
    assert h.reachable_count(a) == 4
    assert h.reachable_count(b) == 1


def test_heap_extension_preserves_entries():
    h, loc = Heap.empty().store_value(suc_chain(3))
    before = h.nodes()
    h2, _ = h.merge("leaf", ())
    assert h2.nodes()[: len(before)] == before
    assert h2.node_count == h.node_count + 1


def test_copy_on_branch_forking():
    base, z = Heap.empty().merge("zero", ())
    left, a = base.merge("suc", (z,))
    right, b = base.merge("leaf", ())
    # both extensions see their own node at location 1
    assert left.entry(1) == ("suc", (0,))
    assert right.entry(1) == ("leaf", ())
    assert base.node_count == 1
    # the earlier view still works after the fork
    more, _ = left.merge("suc", (a,))
    assert more.entry(2) == ("suc", (1,))


def test_maximal_sharing_flag():
    assert Heap.empty().is_maximally_shared()
    h, _ = Heap.empty().store_value(complete_tree(5))
    assert h.is_maximally_shared()
    dup = _Store()
    dup.entries = [("zero", ()), ("zero", ())]
    dup.index = {("zero", ()): 1}
    assert not Heap(dup, 2).is_maximally_shared()


def test_unfold_injective_on_shared_heap():
    h, _ = Heap.empty().store_value(complete_tree(4))
    h, _ = h.store_value(suc_chain(5))
    trees = [h.unfold(l) for l in h.locations()]
    for i in range(len(trees)):
        for j in range(i + 1, len(trees)):
            assert trees[i] != trees[j]


def test_node_count_matches_minimal_shared_size():
    rng = random.Random(20)
    cons = {"leaf": 0, "one": 1, "two": 2}
    for _ in range(60):
        v = random_value(rng, cons, 5)
        h, _ = Heap.empty().store_value(v)
        assert h.node_count == minimal_shared_size([v])


def test_canonical_tree_shapes():
    g = canonical_tree(App("zero", ()))
    assert g.node_count == 1 and g.labels == ["zero"]
    g = canonical_tree(App("branch", (App("leaf", ()), App("leaf", ()))))
    assert g.node_count == 3  # occurrences, not shared nodes
    assert g.labels[g.root] == "branch"
    g = canonical_tree(App("m", (Var("x"), Var("x"))))
    assert g.var_nodes["x"] == (1, 2)
    assert g.var_name(1) == "x" and g.var_name(0) is None


def test_canonical_tree_preorder():
    g = canonical_tree(App("f", (App("a", ()), App("b", ()))))
    assert g.labels == ["f", "a", "b"]
    assert g.children[0] == (1, 2)


def test_match_graph_binds_locations():
    h, loc = Heap.empty().store_value(suc_chain(1))
    got = match_graph(App("suc", (Var("x"),)), h, loc)
    assert got is not None
    morphism, binding = got
    assert binding == {"x": 0}
    assert morphism[0] == loc
    assert match_graph(App("zero", ()), h, loc) is None


def test_match_graph_morphism_preserves_labels():
    h, loc = Heap.empty().store_value(App("m", (App("leafm", ()), App("leafn", ()))))
    pat = App("m", (Var("a"), Var("b")))
    morphism, binding = match_graph(pat, h, loc)
    g = canonical_tree(pat)
    for node, at in morphism.items():
        if g.labels[node] is not None:
            assert h.entry(at)[0] == g.labels[node]
    assert binding["a"] != binding["b"]


def test_repeated_variable_needs_equal_locations():
    eq = App("branch", (App("leaf", ()), App("leaf", ())))
    h, loc = Heap.empty().store_value(eq)
    pat = App("branch", (Var("x"), Var("x")))
    assert match_pattern_at(h, pat, loc) == {"x": 0}
    ne = App("branch", (App("leaf", ()), App("zero", ())))
    h2, loc2 = Heap.empty().store_value(ne)
    assert match_pattern_at(h2, pat, loc2) is None


def test_match_agrees_with_tree_matching():
    """On a maximally shared heap, location matching and tree matching
    accept the same pairs, and bindings agree through unfolding."""
    rng = random.Random(7)
    cons = {"zero": 0, "suc": 1, "m": 2}

    def pattern(depth: int):
        if depth == 0 or rng.random() < 0.35:
            return Var(f"v{rng.randint(1, 3)}")
        c = rng.choice(sorted(cons))
        return App(c, tuple(pattern(depth - 1) for _ in range(cons[c])))

    for _ in range(1000):
        pat = pattern(3)
        val = random_value(rng, cons, 4)
        h, loc = Heap.empty().store_value(val)
        by_loc = match_pattern_at(h, pat, loc)
        by_tree = match_term(pat, val)
        if by_tree is None:
            assert by_loc is None
        else:
            assert by_loc is not None
            assert {k: h.unfold(l) for k, l in by_loc.items()} == by_tree
        full = match_graph(pat, h, loc)
        assert (full is None) == (by_loc is None)


def test_to_dot_lists_nodes_and_positional_edges():
    h, loc = Heap.empty().store_value(App("m", (App("leafm", ()), App("leafn", ()))))
    dot = h.to_dot([loc])
    assert dot.startswith("digraph heap {")
    assert 'n2 [label="l2: m"];' in dot
    first, second = h.entry(loc)[1]
    assert f'n2 -> n{first} [label="1"];' in dot
    assert f'n2 -> n{second} [label="2"];' in dot
    # restricting to a root hides unrelated nodes
    h2, extra = h.merge("zero", ())
    assert "zero" not in h2.to_dot([loc])
    assert "zero" in h2.to_dot()


def test_unfold_size_versus_term_size():
    v = complete_tree(10)
    h, loc = Heap.empty().store_value(v)
    assert h.unfolded_size(loc) == term_size(v) == 2**11 - 1
