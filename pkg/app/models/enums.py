from enum import Enum


class RunMode(str, Enum):
    TF_NORMALIZE = "tf-normalize"  # λ, h, Ā и невязка нормировки
    TF_SAMPLE = "tf-sample"        # классическая цепь Элтона
    ET_SOLVE = "et-solve"          # двойственная задача
    ET_KERNEL = "et-kernel"        # B, h, C̄
    ET_SAMPLE = "et-sample"        # цепь плана
    ET_ORACLE = "et-oracle"        # точные интегралы
    COMPARE = "compare"            # сэмплер против оракула


class Scale(str, Enum):
    LOG = "log"  # в документе значения A(w) / c(x,i,j)
    EXP = "exp"  # в документе e^{A(w)} / e^{c(x,i,j)}


class CandidateCheck(str, Enum):
    POSITIVE = "positive"                      # z1, z2 > 0
    ON_CONIC = "on_conic"                      # точка на обеих кониках
    SPECTRAL = "spectral"                      # второе собственное число < 1
    SPECTRAL_AMBIGUOUS = "spectral_ambiguous"  # второе собственное число в полосе вокруг 1
