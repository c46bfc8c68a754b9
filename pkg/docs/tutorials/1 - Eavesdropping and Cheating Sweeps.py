#!/usr/bin/env python
# coding: utf-8

# # 1 - Eavesdropping and Cheating Sweeps

# In[1]:


import Q_CRYPTO
import pandas as pd


# ### 1. How much does Eve disturb?
# 
# Sweep the share of pulses Eve intercepts. The error rate on the sifted bits grows linearly, a quarter at full interception.

# In[2]:


base = Q_CRYPTO.ExperimentConfig(protocol='bb84', n=5000, trials=20, seed=3)

r1 = Q_CRYPTO.Simulation(name='interception')
Q_CRYPTO.sens_ParameterSweep(r1, 'eve', ['none',
                                         'intercept-rectilinear@0.25',
                                         'intercept-rectilinear@0.5',
                                         'intercept-rectilinear'], config=base)
r1.calculateTrials()


# In[3]:


r1.scenarioComparison('qber')


# In[4]:


r1.scenarioComparison('eve_b')


# In[5]:


r1.scenarioComparison('rejected')


# ### 2. Eve's basis choice
# 
# Measuring halfway between the two bases (pi/8) gives the same disturbance as a fixed basis, with information spread evenly over both of Alice's bases.

# In[6]:


r2 = Q_CRYPTO.Simulation(name='eve basis')
Q_CRYPTO.sens_ParameterSweep(r2, 'eve', ['intercept-rectilinear',
                                         'intercept-random',
                                         'intercept-angle:0.3926990817'], config=base)
r2.calculateTrials()
pd.concat({'eve_b': r2.scenarioComparison('eve_b')['mean'],
           'eve_d': r2.scenarioComparison('eve_d')['mean']}, axis=1)


# ### 3. Lossy channels
# 
# Loss and detector inefficiency only thin out the pulses; they never cause disagreements.

# In[7]:


r3 = Q_CRYPTO.Simulation(name='loss')
Q_CRYPTO.sens_ParameterSweep(r3, 'loss', [0.0, 0.3, 0.6, 0.9], config=base)
r3.calculateTrials()
r3.scenarioComparison('key_length')


# ### 4. Cheating at coin tossing
# 
# Late fabrication is caught almost always once Bob's tables have a few dozen entries. The EPR attack wins every time while Alice stores her halves perfectly, and is caught once storage loses a share of them.

# In[8]:


toss = Q_CRYPTO.ExperimentConfig(protocol='cointoss', n=1000, trials=50, seed=5)

r4 = Q_CRYPTO.Simulation(name='cheating')
Q_CRYPTO.sens_ParameterSweep(r4, 'cheat', ['honest', 'late', 'mixed', 'mixed:22.5',
                                           'epr:0', 'epr:0.1', 'epr:0.5'], config=toss)
r4.calculateTrials()
pd.concat({'alice_win': r4.scenarioComparison('alice_win')['mean'],
           'cheat_detected': r4.scenarioComparison('cheat_detected')['mean']}, axis=1)


# ### 5. Save a report

# In[9]:


report = r4.scenario['cheat=epr:0.1'].report
print(report.to_text())

