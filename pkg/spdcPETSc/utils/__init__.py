'''
Output writers and progress monitoring of spdcPETSc
'''
