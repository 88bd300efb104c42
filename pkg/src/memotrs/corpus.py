"""Built-in example programs and function definitions.

The same texts are shipped as files under programs/ at the repository root;
a test guards against drift. Tests and benchmarks import them from here so
the installed package is self-contained.
"""

ADD_TRS = """\
# unary addition
constructors: zero/0, suc/1 ;
operations:   add/2 ;
rules:
  add(zero, y)   -> y ;
  add(suc(x), y) -> suc(add(x, y)) ;
"""

ID_TRS = """\
constructors: zero/0, suc/1 ;
operations:   id/1 ;
rules:
  id(x) -> x ;
"""

TREE_TRS = """\
# full binary tree of height n; every level shares one node in the heap
constructors: zero/0, suc/1, leaf/0, branch/2 ;
operations:   tree/1, br/1 ;
rules:
  tree(zero)   -> leaf ;
  tree(suc(x)) -> br(tree(x)) ;
  br(t)        -> branch(t, t) ;
"""

RABBITS_TRS = """\
# genealogical rabbit trees: m = mature pair, n = newborn pair
constructors: zero/0, suc/1, leafm/0, leafn/0, n/1, m/2 ;
operations:   rabbits/1, adults/1, babies/1 ;
rules:
  rabbits(zero)   -> leafn ;
  rabbits(suc(x)) -> babies(x) ;
  adults(zero)    -> leafm ;
  adults(suc(x))  -> m(adults(x), babies(x)) ;
  babies(zero)    -> leafn ;
  babies(suc(x))  -> n(adults(x)) ;
"""

LEAFS_TRS = """\
# leaf count of a rabbit tree, as a plain rewrite program
constructors: zero/0, suc/1, leafn/0, leafm/0, n/1, m/2 ;
operations:   leafs/1, add/2 ;
rules:
  leafs(leafn)   -> suc(zero) ;
  leafs(leafm)   -> suc(zero) ;
  leafs(n(t))    -> leafs(t) ;
  leafs(m(s, t)) -> add(leafs(s), leafs(t)) ;
  add(zero, y)   -> y ;
  add(suc(x), y) -> suc(add(x, y)) ;
"""

ADD_GRSR = """\
algebra N = zero/0, suc/1 ;

def add : N@2 x N@1 -> N@1 =
  rec over N {
    zero => proj 1 1 ;
    suc  => comp cons[suc] (proj 3 2) ;
  } ;
"""

TREE_GRSR = """\
algebra N = zero/0, suc/1 ;
algebra T = leaf/0, branch/2 ;

def tree : N@1 -> T@0 =
  rec over N {
    zero => cons[leaf] ;
    suc  => comp cons[branch] (proj 2 2, proj 2 2) ;
  } ;
"""

RABBITS_GRSR = """\
algebra N = zero/0, suc/1 ;
algebra R = leafn/0, leafm/0, n/1, m/2 ;

# adults and babies are the two components of one simultaneous recursion
def adults : N@1 -> R@0 =
  rec over N {
    zero => cons[leafm], cons[leafn] ;
    suc  => comp cons[m] (proj 3 2, proj 3 3),
            comp cons[n] (proj 3 2) ;
  } ;

def babies : N@1 -> R@0 =
  rec over N {
    zero => cons[leafm], cons[leafn] ;
    suc  => comp cons[m] (proj 3 2, proj 3 3),
            comp cons[n] (proj 3 2) ;
  } select 2 ;

def rabbits : N@1 -> R@0 =
  case over N {
    zero => cons[leafn] ;
    suc  => babies ;
  } ;
"""

LEAFS_GRSR = """\
algebra N = zero/0, suc/1 ;
algebra R = leafn/0, leafm/0, n/1, m/2 ;

def add : N@2 x N@1 -> N@1 =
  rec over N {
    zero => proj 1 1 ;
    suc  => comp cons[suc] (proj 3 2) ;
  } ;

def one = comp cons[suc] (cons[zero]) ;

# not tierable: the m branch feeds two recursion results into add, whose
# own recursion argument would then need a tier above itself
def leafs : R@1 -> N@1 =
  rec over R {
    leafn => one ;
    leafm => one ;
    n     => proj 2 2 ;
    m     => comp add (proj 4 3, proj 4 4) ;
  } ;
"""

PROGRAMS = {
    "add": ADD_TRS,
    "id": ID_TRS,
    "tree": TREE_TRS,
    "rabbits": RABBITS_TRS,
    "leafs": LEAFS_TRS,
}

FUNCTIONS = {
    "add": ADD_GRSR,
    "tree": TREE_GRSR,
    "rabbits": RABBITS_GRSR,
    "leafs": LEAFS_GRSR,
}
