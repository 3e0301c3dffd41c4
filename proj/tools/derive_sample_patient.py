#!/usr/bin/env python3
"""Derive the sample patient file from published population models.

Propofol PK:      Eleveld et al., Br J Anaesth 2018 (opiates co-administered).
Remifentanil PK:  Eleveld et al., Anesthesiology 2017.
BIS interaction:  Bouillon et al., Anesthesiology 2004 (additive, beta = 0).
Fat-free mass:    Al-Sallami et al., Clin Pharmacokinet 2015.

The library itself never evaluates covariate regressions; this script is run
once and its output is committed as data/patient_f56_180cm_92kg.ini.

Usage: derive_sample_patient.py [--age 56] [--height 180] [--weight 92] [--male]
"""
import argparse
from math import exp


def sigmoid(x, c50, gamma):
    return x**gamma / (c50**gamma + x**gamma)


def fat_free_mass(age, weight, height_m, male):
    bmi = weight / height_m**2
    if male:
        return (0.88 + (1 - 0.88) / (1 + (age / 13.4) ** -12.7)) * (
            9270 * weight / (6680 + 216 * bmi))
    return (1.11 + (1 - 1.11) / (1 + (age / 7.1) ** -1.1)) * (
        9270 * weight / (8780 + 244 * bmi))


def propofol_eleveld(age, weight, height_m, male, opiates=True):
    th = [None, 6.28, 25.5, 273, 1.79, 1.83, 1.11, 0.191, 42.3, 9.06, -0.0156,
          -0.00286, 33.6, -0.0138, 68.3, 2.10, 1.30, 1.42, 0.68]
    ffm = fat_free_mass(age, weight, height_m, male)
    ffm_ref = fat_free_mass(35, 70, 1.7, True)
    pma, pma_ref = age * 52 + 40, 35 * 52 + 40

    def central(w):
        return sigmoid(w, th[12], 1)

    opiate_v3 = exp(th[13] * age) if opiates else 1.0
    opiate_cl = exp(th[11] * age) if opiates else 1.0
    v1 = th[1] * central(weight) / central(70)
    v2 = th[2] * weight / 70 * exp(th[10] * (age - 35))
    v3 = th[3] * ffm / ffm_ref * opiate_v3
    cl1 = (th[4] if male else th[15]) * (weight / 70) ** 0.75 * (
        sigmoid(pma, th[8], th[9]) / sigmoid(pma_ref, th[8], th[9])) * opiate_cl
    q3_mat = sigmoid(age * 52 + 40, th[14], 1)
    cl2 = th[5] * (v2 / th[2]) ** 0.75 * (1 + th[16] * (1 - q3_mat))
    cl3 = th[6] * (v3 / th[3]) ** 0.75 * q3_mat / sigmoid(35 * 52 + 40, th[14], 1)
    ke = 0.146 * (weight / 70) ** -0.25
    return dict(V1=v1, V2=v2, V3=v3, Cl1=cl1, Cl2=cl2, Cl3=cl3, ke=ke)


def remifentanil_eleveld(age, weight, height_m, male):
    ffm = fat_free_mass(age, weight, height_m, male)
    ffm_ref = fat_free_mass(35, 70, 1.7, True)
    size = ffm / ffm_ref
    kmat = weight**2 / (weight**2 + 2.88**2)
    kmat_ref = 70**2 / (70**2 + 2.88**2)
    ksex = 1.0 if male else 1 + 0.47 * sigmoid(age, 12, 6) * (1 - sigmoid(age, 45, 6))
    v1 = 5.81 * size * exp(-0.00554 * (age - 35))
    v2 = 8.82 * size * exp(-0.00327 * (age - 35)) * ksex
    v3 = 5.03 * size * exp(-0.0315 * (age - 35)) * exp(-0.0260 * (weight - 70))
    cl1 = 2.58 * size**0.75 * (kmat / kmat_ref) * ksex * exp(-0.00327 * (age - 35))
    cl2 = 1.72 * (v2 / 8.82) ** 0.75 * exp(-0.00554 * (age - 35)) * ksex
    cl3 = 0.124 * (v3 / 5.03) ** 0.75 * exp(-0.00554 * (age - 35))
    ke = 1.09 * exp(-0.0289 * (age - 35))
    return dict(V1=v1, V2=v2, V3=v3, Cl1=cl1, Cl2=cl2, Cl3=cl3, ke=ke)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--age", type=float, default=56)
    ap.add_argument("--height", type=float, default=180, help="cm")
    ap.add_argument("--weight", type=float, default=92, help="kg")
    ap.add_argument("--male", action="store_true")
    a = ap.parse_args()
    h = a.height / 100
    sex = "male" if a.male else "female"
    print(f"# Sample patient: {sex}, {a.age:g} y, {a.height:g} cm, {a.weight:g} kg.")
    print("# Generated by tools/derive_sample_patient.py from the Eleveld propofol (2018,")
    print("# with opiates) and remifentanil (2017) PK models and the Bouillon (2004)")
    print("# additive BIS model. Volumes L, clearances L/min, ke 1/min.")
    print("# Propofol concentrations mg/L, remifentanil ug/L.")
    for name, p in (("propofol", propofol_eleveld(a.age, a.weight, h, a.male)),
                    ("remifentanil", remifentanil_eleveld(a.age, a.weight, h, a.male))):
        print(f"\n[{name}]")
        for k in ("V1", "V2", "V3", "Cl1", "Cl2", "Cl3", "ke"):
            print(f"{k} = {p[k]:.10g}")
    print("\n[pd]")
    for k, v in (("E0", 97.4), ("Emax", 97.4), ("gamma", 1.43), ("Ce50p", 4.47),
                 ("Ce50r", 19.3)):
        print(f"{k} = {v:g}")


if __name__ == "__main__":
    main()
